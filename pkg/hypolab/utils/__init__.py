"""Utils package initialization."""