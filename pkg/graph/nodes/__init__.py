"""Graph nodes: config loading, one node per subcommand, and the report node."""
