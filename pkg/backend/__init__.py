# Backend package for glassbound: services, commands and the CLI
