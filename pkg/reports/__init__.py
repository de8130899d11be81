"""Report rendering and the bound-table reproduction."""
