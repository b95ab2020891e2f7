"""Recovery algorithm plugins; each module exposes get_plugin()."""
