"""Drop-level parallelism for the experiment harness"""
