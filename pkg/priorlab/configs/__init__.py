"""Built-in run presets shipped as package data."""
