import sys

from balsched.cli import main

sys.exit(main())
