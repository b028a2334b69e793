# -*- coding: utf-8 -*-
"""msibim documentation build configuration file.

This file is execfile()d with the current directory set to its containing dir.

"""

import sphinx_readable_theme

import msibim


# -- General configuration ----------------------------------------------------

# Defining Sphinx extension modules.
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
]

autodoc_default_options = {
    'members': True,
    'show-inheritance': True,
    'member-order': 'bysource',
}
intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
}

# The suffix of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'msibim'

# The short X.Y version.
version = msibim.__version__
# The full version, including alpha/beta/rc tags.
release = msibim.__version__

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# If true, the current module name will be prepended to all description
# unit titles (such as .. function::).
add_module_names = False


# -- Options for HTML output --------------------------------------------------

html_theme_path = [sphinx_readable_theme.get_html_theme_path()]
html_theme = 'readable'

# Output file base name for HTML help builder.
htmlhelp_basename = 'msibimdoc'


# -- Options for manual page output -------------------------------------------

# One entry per manual page. List of tuples
# (source start file, name, description, authors, manual section).
man_pages = [
    (
        'index',
        'msibim',
        u'msibim Documentation',
        [],
        1,
    ),
]
