# owcsa documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
# Build with:
#
#   sphinx-build -N -d sphinx-crud -a man html

import configparser
import os
import sys

# The modules live in code/; autodoc imports them from there.
sys.path.insert(0, os.path.abspath('../code'))

# Version and author come from setup.cfg, so there is one place to edit.
_setup = configparser.ConfigParser()
_setup.read(os.path.join(os.path.dirname(os.path.abspath(__file__)),
                         '..', 'setup.cfg'))
conf = dict(_setup['metadata'])

# -- General configuration -----------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax']

templates_path = []

source_suffix = '.rst'

master_doc = 'index'

project = u'owcsa'
copyright = u'2026'

release = conf['version']
version = release[:release.rfind('.')]

language = 'en'

today_fmt = '%Y-%m-%d'

exclude_trees = ['build']

# -- Options for HTML output ---------------------------------------------

html_static_path = []

html_last_updated_fmt = '%Y-%m-%dT%H:%M:%S'

htmlhelp_basename = 'owcsadoc'

# -- Options for LaTeX output --------------------------------------------

latex_paper_size = 'a4'

latex_documents = [
    ('index', 'owcsa.tex', u'owcsa Documentation', u'', 'manual'),
]

# -- Options for autodoc -------------------------------------------------

autoclass_content = 'both'
autodoc_member_order = 'bysource'
