"""Configure Django for pytest, mirroring what ``manage.py test`` does."""
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "core.settings")
django.setup()
