"""Library modules of the gaussflux workbench."""
