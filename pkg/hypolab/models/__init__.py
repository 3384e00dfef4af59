"""Models package initialization."""