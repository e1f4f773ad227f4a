#!/usr/bin/env python3
import sys

from gfextract.cli import main

sys.exit(main())
