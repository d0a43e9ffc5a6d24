"""
Django settings for convexwitness project.

There is no web surface: the project is driven through management commands
(see witness/management/commands). Settings exist for configuration,
logging and the optional run-record database.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import os


def getenv_bool(name: str, default: bool = False) -> bool:
    return os.getenv(name, str(default)).lower() in ['1', 'true', 'yes', 'on']


def getenv_int(name: str, default: int) -> int:
    raw = os.getenv(name, '')
    if not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f'{name} must be an integer, got {raw!r}')


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is served or signed, but Django refuses to start without a key.
SECRET_KEY = os.getenv('SECRET_KEY', 'convexwitness-local-key')

DEBUG = getenv_bool('DEBUG', False)

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'witness',
]

# DRF is used for its serializers only; without django.contrib.auth there is no user model
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
}

MIDDLEWARE = []


# Database
# Run records go to Postgres when POSTGRES_DB is set (docker-compose),
# otherwise to a local sqlite file.

if os.getenv('POSTGRES_DB'):
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': os.getenv('POSTGRES_DB'),
            'USER': os.getenv('POSTGRES_USER'),
            'PASSWORD': os.getenv('POSTGRES_PASSWORD'),
            'HOST': os.getenv('DATABASE_HOST', 'localhost'),
            'PORT': os.getenv('DATABASE_PORT', '5432'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'witness.sqlite3',
        }
    }


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging goes to stderr so command output on stdout stays reproducible.

WITNESS_LOG_LEVEL = os.getenv('WITNESS_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'witness': {
            'handlers': ['console'],
            'level': WITNESS_LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Evaluator and experiment defaults (flags on the commands override these)

# Total (x, t) nodes one sup/level-set sweep may evaluate
WITNESS_GRID_BUDGET = getenv_int('WITNESS_GRID_BUDGET', 2 ** 24)

# Nodes evaluated per block; bounds peak memory of a sweep
WITNESS_BLOCK_NODES = getenv_int('WITNESS_BLOCK_NODES', 2 ** 20)

WITNESS_THREADS = getenv_int('WITNESS_THREADS', os.cpu_count() or 1)

WITNESS_FAST_PATH = os.getenv('WITNESS_FAST_PATH', 'auto')
if WITNESS_FAST_PATH not in ('auto', 'on', 'off'):
    raise ValueError('WITNESS_FAST_PATH must be one of auto, on, off')

WITNESS_SEED = getenv_int('WITNESS_SEED', 0)

# Persist a RunRecord for every command run
WITNESS_RECORD_RUNS = getenv_bool('WITNESS_RECORD_RUNS', False)
