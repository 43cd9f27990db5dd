"""Command line interface: configs, experiment dispatch and reports."""
