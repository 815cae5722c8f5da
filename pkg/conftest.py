import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "fourwave.settings")
django.setup()
