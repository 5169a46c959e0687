# Core module - configuration, logging, errors, randomness, statistics
