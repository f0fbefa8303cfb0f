"""
Django settings for the GeoDubins project
"""
import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.getenv('SECRET_KEY', 'geodubins-local-key-change-this')

DEBUG = os.getenv('DEBUG', 'True').lower() in ('true', '1', 'yes')
ALLOWED_HOSTS = os.getenv('ALLOWED_HOSTS', '*').split(',')

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'geodubins',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# GeoDubins Configuration
GEODUBINS_CONFIG = {
    'THREADS': int(os.getenv('GEODUBINS_THREADS', str(os.cpu_count() or 1))),
    'FRAME_TOL': float(os.getenv('GEODUBINS_FRAME_TOL', '1e-8')),
    'JUNCTION_TOL': float(os.getenv('GEODUBINS_JUNCTION_TOL', '1e-9')),
    'PROBE_COUNT': int(os.getenv('GEODUBINS_PROBE_COUNT', '64')),
    'PROBE_WINDOW': int(os.getenv('GEODUBINS_PROBE_WINDOW', '10')),
    'PROBE_RHO0': float(os.getenv('GEODUBINS_PROBE_RHO0', '0.2')),
    'ORACLE_GRID': int(os.getenv('GEODUBINS_ORACLE_GRID', '4096')),
    'ORACLE_BISECTIONS': int(os.getenv('GEODUBINS_ORACLE_BISECTIONS', '200')),
    'DEDUP_LENGTH_TOL': float(os.getenv('GEODUBINS_DEDUP_LENGTH_TOL', '1e-9')),
    'DEDUP_FRAME_TOL': float(os.getenv('GEODUBINS_DEDUP_FRAME_TOL', '1e-7')),
    'STALL_FACTOR': float(os.getenv('GEODUBINS_STALL_FACTOR', '1e-10')),
    'MAX_PASSES': int(os.getenv('GEODUBINS_MAX_PASSES', '10000')),
    'H4_OFFSETS': [float(v) for v in os.getenv('GEODUBINS_H4_OFFSETS', '0,1e-3,1e-2').split(',')],
    'H4_SAMPLES': int(os.getenv('GEODUBINS_H4_SAMPLES', '200')),
    'AXIS_GRID_POINTS': int(os.getenv('GEODUBINS_AXIS_GRID_POINTS', '10000')),
    'G_RADIUS': float(os.environ['GEODUBINS_G_RADIUS']) if os.getenv('GEODUBINS_G_RADIUS') else None,
    'G_RADIUS_SAMPLES': int(os.getenv('GEODUBINS_G_RADIUS_SAMPLES', '16')),
    'SCHEMA_VERSION': 1,
}

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'INFO',
    },
    'loggers': {
        'geodubins': {
            'level': os.getenv('GEODUBINS_LOG_LEVEL', 'INFO'),
        },
    },
}
