"""Graph edit distance bounds and exact search."""
