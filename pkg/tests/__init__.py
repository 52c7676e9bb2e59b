# edgecode tests
