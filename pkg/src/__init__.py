"""Source root package."""
