"""
Kernel study parameters.
"""

from pydantic import BaseModel, Field, model_validator


class KernelParams(BaseModel):
    """
    Window chi_pq supported in (-p - 1, -q) and the order delta of |eta|^delta.

    p == q is accepted and gives the empty window.
    """

    p: float = Field(..., ge=2.0)
    q: float = Field(..., ge=2.0)
    delta: float = Field(0.25, ge=0.0, lt=0.5)

    @model_validator(mode="after")
    def validate_window(self):
        if self.p < self.q:
            raise ValueError("p must be at least q")
        return self

    @property
    def empty(self) -> bool:
        return self.p == self.q
