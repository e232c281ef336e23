"""One module per CLI subcommand; each also runs standalone via ``python -m``."""
