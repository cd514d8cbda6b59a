import sys

from incnlu.cli import main

sys.exit(main())
