import sys

from .gmcli import main

sys.exit(main())
