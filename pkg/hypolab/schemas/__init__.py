"""Schemas package initialization."""