from SoftLayer.API import BaseClient
