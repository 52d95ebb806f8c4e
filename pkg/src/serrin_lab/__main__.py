import sys

from serrin_lab.cli import main

sys.exit(main())
