"""Strategyproof mechanisms for one obnoxious facility on [0, 1]."""
