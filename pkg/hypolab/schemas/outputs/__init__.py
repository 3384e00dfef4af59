"""Outputs package initialization."""