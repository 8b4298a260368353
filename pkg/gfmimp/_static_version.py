# This file is overwritten by setup.py when a source or binary distribution
# is made. The value "__use_git__" makes _version.py ask git instead.

version = "0.1.0"
