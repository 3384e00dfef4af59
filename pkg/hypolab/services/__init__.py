"""Services package initialization."""