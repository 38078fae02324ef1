"""Seq2seq fine-tuning and prediction driver.

Consumes the pipeline's prompt files, fine-tunes a small encoder-decoder
checkpoint, and writes ranked-candidate prediction files back in the
pipeline's schema. Training prompts may carry context; prediction refuses
any eval file that does.
"""

__version__ = "0.1.0"
