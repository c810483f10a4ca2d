"""Suite orchestration, configuration, reports and the command-line entry point."""
