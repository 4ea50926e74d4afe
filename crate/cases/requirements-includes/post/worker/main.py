import boto3
import marshmallow
