"""Linear Poisson structures: BCH, Duflo factors and the coadjoint action groupoid."""
