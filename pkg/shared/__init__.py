# Shared module for glassbound: configuration, models, schemas and exceptions
