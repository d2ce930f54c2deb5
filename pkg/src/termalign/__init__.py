"""termalign: extract, rank, and curate foreign-term/Arabic-term pairs."""

__version__ = "0.1.0"
