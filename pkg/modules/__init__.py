# modules package: Grassmann tensor toolkit
