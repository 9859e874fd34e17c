import sys

from hetpca.cli import main

sys.exit(main())
