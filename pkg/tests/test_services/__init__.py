"""Test services package initialization."""