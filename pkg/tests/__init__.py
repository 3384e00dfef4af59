"""Tests package initialization."""