# edgecode library modules
