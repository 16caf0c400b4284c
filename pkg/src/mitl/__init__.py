"""Satisfiability and model checking of MITL through one-clock alternating timed automata."""
