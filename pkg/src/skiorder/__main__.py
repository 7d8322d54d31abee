import sys

from skiorder.cli import main

sys.exit(main())
