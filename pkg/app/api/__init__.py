# Command-line surface