from .app import main, run_cli
