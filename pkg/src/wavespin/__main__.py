import sys

from wavespin.cli import main

sys.exit(main())
