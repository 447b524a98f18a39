#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# pathwave documentation build configuration file
#
# This file is execfile()d with the current directory set to its
# containing dir.

html_theme = "sphinx_rtd_theme"

import sys
import os

sys.path.insert(0, os.path.abspath('../../'))

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.viewcode', 'sphinx.ext.autodoc', 'sphinx.ext.mathjax']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = 'pathwave'
copyright = '2016-2018, Ran Aroussi'
author = 'Ran Aroussi'

version = '0.3'
release = '0.3.0'

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_static_path = []
htmlhelp_basename = 'pathwavedoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
    (master_doc, 'pathwave.tex', 'pathwave Documentation',
     'Ran Aroussi', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'pathwave', 'pathwave Documentation',
     [author], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (master_doc, 'pathwave', 'pathwave Documentation',
     author, 'pathwave', 'Proper-time path integrals for wave media',
     'Miscellaneous'),
]
