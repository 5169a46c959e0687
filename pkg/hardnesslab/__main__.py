import sys

from hardnesslab.cli.main import main

sys.exit(main())
