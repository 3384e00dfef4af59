"""Core package initialization."""