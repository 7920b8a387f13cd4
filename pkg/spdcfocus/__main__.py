import sys

from spdcfocus.cli import main

sys.exit(main())
