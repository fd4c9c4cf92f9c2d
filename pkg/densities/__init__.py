"""Alpha-density algebra on finite-dimensional vector spaces."""
