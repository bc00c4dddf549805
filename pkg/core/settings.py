"""
Django settings for core project.

The project has no web surface: it hosts the paco app, whose management
commands are the command-line front end of the restoration library.
Every PACO_* value can be overridden from the environment or a .env file.
"""

import os, random, string
from pathlib import Path
from dotenv import load_dotenv
from str2bool import str2bool

load_dotenv()  # take environment variables from .env.

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY')
if not SECRET_KEY:
    SECRET_KEY = ''.join(random.choice( string.ascii_lowercase  ) for i in range( 32 ))

# Enable/Disable DEBUG Mode
DEBUG = str2bool(os.environ.get('DEBUG', 'False'))

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "paco",
]

MIDDLEWARE = []

# No models, so no database
DATABASES = {}

# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Solver defaults
PACO_KAPPA = float(os.environ.get('PACO_KAPPA', '10'))
PACO_SHRINK = float(os.environ.get('PACO_SHRINK', '0.5'))
PACO_TOL = float(os.environ.get('PACO_TOL', '1e-8'))
PACO_IMAGE_MAX_ITER = int(os.environ.get('PACO_IMAGE_MAX_ITER', '256'))
PACO_AUDIO_MAX_ITER = int(os.environ.get('PACO_AUDIO_MAX_ITER', '1024'))
PACO_VIDEO_MAX_ITER = int(os.environ.get('PACO_VIDEO_MAX_ITER', '64'))
PACO_PARTIAL_UPDATES = str2bool(os.environ.get('PACO_PARTIAL_UPDATES', 'True'))

# scipy.fft worker threads
PACO_WORKERS = int(os.environ.get('PACO_WORKERS', '1'))

PACO_LOG_LEVEL = os.environ.get('PACO_LOG_LEVEL', 'INFO')
PACO_LOG_FILE = os.environ.get('PACO_LOG_FILE')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': True,
        },
        'paco': {
            'handlers': ['console'],
            'level': PACO_LOG_LEVEL,
            'propagate': False,
        },
    },
}

if PACO_LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.FileHandler',
        'filename': PACO_LOG_FILE,
        'formatter': 'verbose',
    }
    LOGGING['loggers']['paco']['handlers'].append('file')
