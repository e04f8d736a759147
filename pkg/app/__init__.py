# Domain types, schemas, configuration and errors
