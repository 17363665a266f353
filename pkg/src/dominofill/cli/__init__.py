"""Command line interface: config ingestion, serialization, verification."""
