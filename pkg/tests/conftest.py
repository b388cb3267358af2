from hypothesis import settings

settings.register_profile("lab", max_examples=60, deadline=None)
settings.load_profile("lab")
