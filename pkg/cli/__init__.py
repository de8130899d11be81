"""Command-line front end for obnoxlp."""
