# Command line modules
