import sys

from irlearn.cli import main

sys.exit(main())
