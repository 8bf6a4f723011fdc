"""Theory and tree routes."""
