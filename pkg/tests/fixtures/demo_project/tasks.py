rap_prompt = "Answer like the rapper drake. {text}"

translation_prompt = "Translate the following text to Spanish: {src}"

digest_prompt = "Summarize the following document in three sentences: {document}"

grammar_prompt = "Correct the grammar and spelling of the following sentence: {sentence}"

transcript_prompt = "You will be provided with a transcript; summarize it for %s audience." % audience_level

email_prompt = f"Write a professional email to {recipient} about {subject_line} in under 120 words."


def helper():
    """A docstring that is long enough for the gate but must not be extracted."""
    branchy_prompt = "prefix that is long enough for the gate " + ("a" if flag else "b")
    return branchy_prompt
