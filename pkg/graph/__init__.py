"""LangGraph pipeline that drives the game toolkit's subcommands."""
