# Configuration file for the Sphinx documentation builder.
# http://www.sphinx-doc.org/en/master/config

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

from gfmimp import __version__  # noqa: E402

# -- Project information -----------------------------------------------------

project = 'gfmimp'
copyright = '2026, gfmimp authors'
author = 'gfmimp authors'

version = '.'.join(__version__.split('.')[:2])
release = __version__

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.doctest',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']
pygments_style = 'sphinx'

# numpydoc-style docstrings throughout the package
napoleon_google_docstring = False
napoleon_use_rtype = False

# -- HTML output -------------------------------------------------------------

html_theme = 'alabaster'
htmlhelp_basename = 'gfmimpdoc'

# -- LaTeX and man page output -----------------------------------------------

latex_documents = [
    (master_doc, 'gfmimp.tex', 'gfmimp Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'gfmimp', 'gfmimp Documentation', [author], 1),
]

# -- Options for autodoc -----------------------------------------------------

autosummary_generate = True
autoclass_content = "both"
autodoc_default_options = {'show-inheritance': True}
