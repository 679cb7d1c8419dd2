"""Commands subpackage: one module per experiment."""
