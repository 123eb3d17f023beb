"""
blurreg Command Line Interface (CLI).

Subcommands sample a scenario, build its matrices, run the baseline, align,
infer bounds and reproduce the built-in example.
"""

__all__ = ["main"]


def main():
    """Entry point for the blurreg CLI."""
    from .commands import app

    app()


if __name__ == "__main__":
    main()
