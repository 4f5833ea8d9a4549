import sys

from fedmech.cli import main

sys.exit(main())
