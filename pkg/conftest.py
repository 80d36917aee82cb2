import os
import sys

# Tests import the package as `src.*`, the same way src/main.py does
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))
