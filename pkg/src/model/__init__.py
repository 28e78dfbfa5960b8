"""Core data model of the configuration logic."""
