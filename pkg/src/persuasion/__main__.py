import sys

from persuasion.cli import main

sys.exit(main())
