"""API layer package."""
