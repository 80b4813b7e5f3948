"""Query engine: parsing, logic, types, tables, dynamic programming and answers."""
