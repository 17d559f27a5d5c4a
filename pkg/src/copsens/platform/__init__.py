"""copsens platform - Cross-cutting concerns (config, logging, errors)."""
