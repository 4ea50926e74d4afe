import django
import celery
