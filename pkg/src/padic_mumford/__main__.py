import sys

from padic_mumford.cli import main

sys.exit(main())
