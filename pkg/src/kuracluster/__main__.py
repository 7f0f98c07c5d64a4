import sys

from kuracluster.cli import main

sys.exit(main())
