"""
Django settings for the fourwave simulator project.

Generated by 'django-admin startproject' using Django 5.2 and trimmed down to
what a command-line simulator needs: no HTTP surface, no persistence.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: nothing is served, but Django still wants a key.
SECRET_KEY = config('SECRET_KEY', default='fourwave-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',

    'core',
    'adiabatic',
    'classical',
    'fock',
    'ensemble',
    'meanfield',
    'simulations',
]

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Simulator defaults. A run config file overrides these, CLI flags override both.
SIMULATION = {
    "WORKERS": config('FWM_WORKERS', default=1, cast=int),
    "OUTPUT_DIR": config('FWM_OUTPUT_DIR', default=str(BASE_DIR / "output")),
    "EPS_TAIL": config('FWM_EPS_TAIL', default=1e-8, cast=float),
    "LONG_RUNNING_MEAN": config('FWM_LONG_RUNNING_MEAN', default=500.0, cast=float),
}


LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}
