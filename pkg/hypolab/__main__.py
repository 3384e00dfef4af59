import sys

from hypolab.main import main

sys.exit(main())
