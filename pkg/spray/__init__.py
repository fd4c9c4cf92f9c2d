"""The local symplectic groupoid of a Poisson structure built from its spray."""
