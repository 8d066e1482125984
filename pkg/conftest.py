import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'focusprover.settings')
django.setup()
